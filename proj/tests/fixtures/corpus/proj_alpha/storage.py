import sqlite3

conn = sqlite3.connect(db_path)
conn.execute(create_sql)
conn.execute(insert_sql)
conn.execute(index_sql)
conn.commit()
conn.commit()
conn.close()
