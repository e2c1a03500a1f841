field q
endpoints 0 1 2 3
dims 0 0 0 1 1 1 0 0 0
map {1} (1,2) [[1]]
map {2} (1,2) [[1]]
