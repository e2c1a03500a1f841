field q
endpoints 0 1 2
dims 0 0 2 2 1 0 2
map {1} (0,1) [[-1,0],[-1,0]]
map {1} (1,2) [[-1,-2]]
