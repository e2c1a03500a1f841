field q
endpoints 0 1
dims 0 0 1 0 0
