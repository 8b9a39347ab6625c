import sqlite3

dbh = sqlite3.connect(db_path)
dbh.execute(create_sql)
dbh.execute(insert_sql)
dbh.execute(index_sql)
dbh.commit()
dbh.commit()
dbh.close()
