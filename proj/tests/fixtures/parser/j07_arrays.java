public static double[][] transpose(double[][] m) {
    double[][] out = new double[m[0].length][m.length];
    for (int i = 0; i < m.length; i++) {
        for (int j = 0; j < m[i].length; ++j) {
            out[j][i] = m[i][j];
        }
    }
    assert out.length > 0 : "empty";
    return out;
}
