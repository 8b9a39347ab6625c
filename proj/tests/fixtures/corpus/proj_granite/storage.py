import sqlite3

vault = sqlite3.connect(db_path)
vault.execute(create_sql)
vault.execute(insert_sql)
vault.execute(index_sql)
vault.commit()
vault.commit()
vault.close()
