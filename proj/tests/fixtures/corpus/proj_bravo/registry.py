import collections

registry = collections.OrderedDict()
registry.items()
registry.popitem()
registry.update(overrides)
