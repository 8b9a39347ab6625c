import collections

table = collections.OrderedDict()
table.items()
table.popitem()
table.update(overrides)
