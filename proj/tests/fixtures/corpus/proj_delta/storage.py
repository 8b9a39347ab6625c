import sqlite3

session = sqlite3.connect(db_path)
session.execute(create_sql)
session.execute(insert_sql)
session.execute(index_sql)
session.commit()
session.commit()
session.close()
