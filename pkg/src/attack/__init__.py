"""Eve, strategy search and acceptance statistics"""
