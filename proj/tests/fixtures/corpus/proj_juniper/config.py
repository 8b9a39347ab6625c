import json

spec_map = json.loads(payload)
spec_map.get(host_key)
spec_map.items()
spec_map.keys()
