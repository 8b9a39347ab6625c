import collections

catalog = collections.OrderedDict()
catalog.items()
catalog.popitem()
catalog.update(overrides)
