import json

cfg = json.loads(payload)
cfg.get(host_key)
cfg.items()
cfg.keys()
