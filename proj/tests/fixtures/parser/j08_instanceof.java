public boolean equals(Object obj) {
    if (this == obj) return true;
    if (!(obj instanceof Point)) {
        return false;
    } else if (obj.getClass() != Point.class) {
        return false;
    }
    Point other = (Point) obj;
    return x == other.x && y == other.y && super.equals(obj);
}
