primary = open(in_path)
backup = open(out_path, 'w')
data = primary.read()
backup.write(data)
backup.write(tail)
backup.close()
primary.close()
