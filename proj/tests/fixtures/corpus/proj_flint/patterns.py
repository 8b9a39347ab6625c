import re

needle = re.compile(raw)
needle.findall(lines)
needle.match(head)
needle.search(tail)
