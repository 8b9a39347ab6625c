rf = open(in_path)
wf = open(out_path, 'w')
data = rf.read()
wf.write(data)
wf.write(tail)
wf.close()
rf.close()
