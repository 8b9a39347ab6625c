inp = open(in_path)
outp = open(out_path, 'w')
data = inp.read()
outp.write(data)
outp.write(tail)
outp.close()
inp.close()
