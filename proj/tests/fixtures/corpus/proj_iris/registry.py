import collections

roster = collections.OrderedDict()
roster.items()
roster.popitem()
roster.update(overrides)
