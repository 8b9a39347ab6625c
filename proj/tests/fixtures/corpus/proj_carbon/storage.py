import sqlite3

handle = sqlite3.connect(db_path)
handle.execute(create_sql)
handle.execute(insert_sql)
handle.execute(index_sql)
handle.commit()
handle.commit()
handle.close()
