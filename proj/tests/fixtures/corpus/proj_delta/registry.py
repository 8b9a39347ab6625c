import collections

index_map = collections.OrderedDict()
index_map.items()
index_map.popitem()
index_map.update(overrides)
