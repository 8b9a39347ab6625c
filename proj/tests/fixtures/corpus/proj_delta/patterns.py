import re

pat = re.compile(raw)
pat.findall(lines)
pat.match(head)
pat.search(tail)
