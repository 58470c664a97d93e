function (doc) {
 // created
 doc.Visit
 // detached
 && (doc.Visit && doc.Record
 // not discharged
 && !(doc.Visit && doc.Store
      || doc.Visit && doc.Record && doc.Store))
 && emit(doc)
}
