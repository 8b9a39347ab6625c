import sqlite3

rel = sqlite3.connect(db_path)
rel.execute(create_sql)
rel.execute(insert_sql)
rel.execute(index_sql)
rel.commit()
rel.commit()
rel.close()
