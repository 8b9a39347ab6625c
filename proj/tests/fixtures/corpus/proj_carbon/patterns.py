import re

regex = re.compile(raw)
regex.findall(lines)
regex.match(head)
regex.search(tail)
