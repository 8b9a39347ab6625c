import json

options = json.loads(payload)
options.get(host_key)
options.items()
options.keys()
