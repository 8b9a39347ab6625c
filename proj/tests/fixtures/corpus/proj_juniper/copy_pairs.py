left = open(in_path)
right = open(out_path, 'w')
data = left.read()
right.write(data)
right.write(tail)
right.close()
left.close()
