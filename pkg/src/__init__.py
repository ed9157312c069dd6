"""src module initialization"""
