
extern BOOLEAN ExampleOneInit(STF_DESCRIPTOR *);
extern BOOLEAN ExampleOneEntry(STF_DESCRIPTOR *,
                   const char* fruit,
                   unsigned int quantity,
                   BOOLEAN*  fufilled,
                   unsigned int*  numberRemaining);
