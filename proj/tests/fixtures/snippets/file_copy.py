file = 'samples/sample.txt'
temp = 'samples/temp.txt'
fi = open(file)
fo = open(temp, 'w')
for s in fi.readlines():
    if s.strip():
        fo.write(s)
    else:
        fo.write('\n')
        break
fo.close()
fi.close()
