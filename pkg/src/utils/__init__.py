# 空檔案，讓 Python 將此目錄視為套件

