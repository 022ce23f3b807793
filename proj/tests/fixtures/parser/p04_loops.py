def flatten(items, depth=1, *args, **kwargs):
    result = []
    for i, item in enumerate(items):
        if isinstance(item, (list, tuple)) and depth > 0:
            result.extend(flatten(item, depth - 1))
        elif item is not None or kwargs.get('keep'):
            result.append(item)
        else:
            continue
    while len(result) > 100:
        result.pop()
    return [x for x in result if x]
