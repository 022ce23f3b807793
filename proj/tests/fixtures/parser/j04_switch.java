private static int score(char c, int[] table, boolean strict) {
    int value = 0;
    switch (c) {
        case 'a':
        case 'e':
            value = table[0] >> 1;
            break;
        case 'z':
            value = strict ? -1 : table[table.length - 1] >>> 2;
            break;
        default:
            value = (int) c;
    }
    do {
        value--;
    } while (value > 10 || value % 7 == 3);
    return value << 1;
}
