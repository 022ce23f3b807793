public int g(){return 1;}
