int find(int[][] grid, int target) {
    int count = 0x1F, hits = 0;
    float ratio = 1.5e-3f;
    outer:
    for (int[] row : grid) {
        for (int v : row) {
            if (v == target) { hits++; continue outer; }
            if (v < 0L) break outer;
        }
    }
    return hits * count;
}
