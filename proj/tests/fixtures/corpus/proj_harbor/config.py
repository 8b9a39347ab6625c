import json

profile = json.loads(payload)
profile.get(host_key)
profile.items()
profile.keys()
