import json

manifest = json.loads(payload)
manifest.get(host_key)
manifest.items()
manifest.keys()
