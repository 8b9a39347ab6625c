import re

rx = re.compile(raw)
rx.findall(lines)
rx.match(head)
rx.search(tail)
