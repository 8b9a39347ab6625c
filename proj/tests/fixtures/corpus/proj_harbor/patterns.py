import re

probe = re.compile(raw)
probe.findall(lines)
probe.match(head)
probe.search(tail)
