src = open(in_path)
dst = open(out_path, 'w')
data = src.read()
dst.write(data)
dst.write(tail)
dst.close()
src.close()
