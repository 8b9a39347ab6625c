hin = open(in_path)
hout = open(out_path, 'w')
data = hin.read()
hout.write(data)
hout.write(tail)
hout.close()
hin.close()
