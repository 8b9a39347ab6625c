with open(path) as fh:
    fh.read()
    fh.read()
