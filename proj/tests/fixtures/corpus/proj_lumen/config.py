import json

site_cfg = json.loads(payload)
site_cfg.get(host_key)
site_cfg.items()
site_cfg.keys()
