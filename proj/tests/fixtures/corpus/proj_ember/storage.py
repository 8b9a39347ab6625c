import sqlite3

link = sqlite3.connect(db_path)
link.execute(create_sql)
link.execute(insert_sql)
link.execute(index_sql)
link.commit()
link.commit()
link.close()
