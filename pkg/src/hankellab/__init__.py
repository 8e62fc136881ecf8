"""Product-dyadic geometry, Littlewood-Paley analysis and small Hankel operators."""
