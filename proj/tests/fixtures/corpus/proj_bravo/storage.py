import sqlite3

db = sqlite3.connect(db_path)
db.execute(create_sql)
db.execute(insert_sql)
db.execute(index_sql)
db.commit()
db.commit()
db.close()
