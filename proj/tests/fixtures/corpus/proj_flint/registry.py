import collections

lookup = collections.OrderedDict()
lookup.items()
lookup.popitem()
lookup.update(overrides)
