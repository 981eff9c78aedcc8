"""
Утилиты ввода-вывода: снимки полей и векторов в CSV, JSON, хеши файлов
"""
