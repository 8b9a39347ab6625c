import json

prefs = json.loads(payload)
prefs.get(host_key)
prefs.items()
prefs.keys()
