import collections

store = collections.OrderedDict()
store.items()
store.popitem()
store.update(overrides)
