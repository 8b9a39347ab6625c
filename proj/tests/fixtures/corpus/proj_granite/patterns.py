import re

scanner = re.compile(raw)
scanner.findall(lines)
scanner.match(head)
scanner.search(tail)
