def clamp(value, low, high):
    return max(low, min(value, high))


def scale(value, factor=1.0):
    return value * factor


def describe(value):
    return f"value={value}"
