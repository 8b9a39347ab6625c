source = open(in_path)
sink = open(out_path, 'w')
data = source.read()
sink.write(data)
sink.write(tail)
sink.close()
source.close()
