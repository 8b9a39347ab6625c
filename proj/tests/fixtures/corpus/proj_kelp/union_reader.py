import os

fh = open(name)
if use_fd:
    fh = os.fdopen(fd)
fh.read()
fh.close()
