import re

matcher = re.compile(raw)
matcher.findall(lines)
matcher.match(head)
matcher.search(tail)
