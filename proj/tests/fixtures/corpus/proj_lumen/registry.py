import collections

rack = collections.OrderedDict()
rack.items()
rack.popitem()
rack.update(overrides)
