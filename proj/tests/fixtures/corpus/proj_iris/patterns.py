import re

finder = re.compile(raw)
finder.findall(lines)
finder.match(head)
finder.search(tail)
