import sqlite3

cx = sqlite3.connect(db_path)
cx.execute(create_sql)
cx.execute(insert_sql)
cx.execute(index_sql)
cx.commit()
cx.commit()
cx.close()
