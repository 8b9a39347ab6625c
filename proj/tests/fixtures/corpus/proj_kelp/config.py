import json

env_map = json.loads(payload)
env_map.get(host_key)
env_map.items()
env_map.keys()
