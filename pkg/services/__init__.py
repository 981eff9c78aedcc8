"""
Сервисы командной строки: маршрутизация подкоманд, параметры, манифесты и режимы конвейера
"""
