import json

conf = json.loads(payload)
conf.get(host_key)
conf.items()
conf.keys()
