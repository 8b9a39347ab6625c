import json

meta = json.loads(payload)
meta.get(host_key)
meta.items()
meta.keys()
