import json

params = json.loads(payload)
params.get(host_key)
params.items()
params.keys()
