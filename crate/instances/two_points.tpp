# P(X) = k², P({a}) = P({b}) = k, zero restrictions
elements a b
value a,b 2
value a 1
value b 1
