reader = open(in_path)
writer = open(out_path, 'w')
data = reader.read()
writer.write(data)
writer.write(tail)
writer.close()
reader.close()
