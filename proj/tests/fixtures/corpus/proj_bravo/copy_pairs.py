fin = open(in_path)
fout = open(out_path, 'w')
data = fin.read()
fout.write(data)
fout.write(tail)
fout.close()
fin.close()
