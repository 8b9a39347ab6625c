import re

sieve = re.compile(raw)
sieve.findall(lines)
sieve.match(head)
sieve.search(tail)
