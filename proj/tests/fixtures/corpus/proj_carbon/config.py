import json

settings = json.loads(payload)
settings.get(host_key)
settings.items()
settings.keys()
