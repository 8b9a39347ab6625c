import collections

ledger = collections.OrderedDict()
ledger.items()
ledger.popitem()
ledger.update(overrides)
