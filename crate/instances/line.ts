field q
endpoints 
dims 1
