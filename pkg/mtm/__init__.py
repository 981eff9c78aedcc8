"""
Численная лаборатория массивной модели Тирринга: поля, солитоны, пара Лакса,
преобразование Бэклунда, эволюция и эксперименты орбитальной устойчивости
"""

__version__ = "0.1.0"
