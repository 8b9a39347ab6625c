import collections

bank = collections.OrderedDict()
bank.items()
bank.popitem()
bank.update(overrides)
