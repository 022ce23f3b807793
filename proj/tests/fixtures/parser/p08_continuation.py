def area(w, h):
    x = w * \
        h
    y = (w +
         h)
    if x > y and \
            w > 0:
        return x
    return y ** 2 // 3
