import sqlite3

store_db = sqlite3.connect(db_path)
store_db.execute(create_sql)
store_db.execute(insert_sql)
store_db.execute(index_sql)
store_db.commit()
store_db.commit()
store_db.close()
