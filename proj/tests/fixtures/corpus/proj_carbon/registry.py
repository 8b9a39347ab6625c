import collections

cache = collections.OrderedDict()
cache.items()
cache.popitem()
cache.update(overrides)
