import re

rex = re.compile(raw)
rex.findall(lines)
rex.match(head)
rex.search(tail)
