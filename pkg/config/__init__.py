from config.settings import *