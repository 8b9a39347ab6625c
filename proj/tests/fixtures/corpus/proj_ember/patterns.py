import re

rx0 = re.compile(raw)
rx0.findall(lines)
rx0.match(head)
rx0.search(tail)
