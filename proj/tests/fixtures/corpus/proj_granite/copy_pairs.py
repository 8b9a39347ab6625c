infile = open(in_path)
outfile = open(out_path, 'w')
data = infile.read()
outfile.write(data)
outfile.write(tail)
outfile.close()
infile.close()
